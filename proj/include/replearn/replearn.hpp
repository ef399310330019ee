#pragma once

// Umbrella header: metalearning and multitask learning of halfspaces over
// shared linear representations, with exact separability oracles,
// non-realizability certificates, and the verification lab.

#include "replearn/common.hpp"
#include "replearn/experiment.hpp"
#include "replearn/geometry.hpp"
#include "replearn/learners.hpp"
#include "replearn/matrix.hpp"
#include "replearn/realizability.hpp"
#include "replearn/reductions.hpp"
#include "replearn/rng.hpp"
#include "replearn/task_model.hpp"
#include "replearn/theory_lab.hpp"
