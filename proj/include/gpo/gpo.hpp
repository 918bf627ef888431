#pragma once

#include "gpo/error.hpp"
#include "gpo/sparsity.hpp"
#include "gpo/symbolic.hpp"
#include "gpo/features.hpp"
#include "gpo/policy_net.hpp"
#include "gpo/trainer.hpp"
#include "gpo/orderings.hpp"
#include "gpo/datagen.hpp"
#include "gpo/eval.hpp"
