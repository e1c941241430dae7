#pragma once

// Hybrid tree/linear gradient boosting: per-step tree-vs-linear competition
// judged out-of-bag, or a fixed alternating schedule; exact linear/tree
// forecast decomposition, channel-decomposed permutation importance,
// observation-weight attribution, and a seeded Monte Carlo benchmark harness.

#include "booster.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "dual_weights.hpp"
#include "errors.hpp"
#include "evaluate.hpp"
#include "importance.hpp"
#include "linear.hpp"
#include "matrix.hpp"
#include "model_io.hpp"
#include "rng.hpp"
#include "simbench.hpp"
#include "tree.hpp"
