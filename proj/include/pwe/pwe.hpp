#pragma once

#include "pwe/corpus.hpp"
#include "pwe/error.hpp"
#include "pwe/eval.hpp"
#include "pwe/gradient_check.hpp"
#include "pwe/io.hpp"
#include "pwe/model.hpp"
#include "pwe/negative.hpp"
#include "pwe/random.hpp"
#include "pwe/tagset.hpp"
#include "pwe/trainer.hpp"
#include "pwe/vectors.hpp"
