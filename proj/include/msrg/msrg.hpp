#pragma once

#include "msrg/dense_oracle.hpp"
#include "msrg/error.hpp"
#include "msrg/estimator.hpp"
#include "msrg/evaluation.hpp"
#include "msrg/ggm_model.hpp"
#include "msrg/restoration.hpp"
#include "msrg/spectral_core.hpp"
#include "msrg/summation.hpp"
#include "msrg/synthesis.hpp"
