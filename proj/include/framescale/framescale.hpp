#pragma once

#include "framescale/errors.hpp"
#include "framescale/linalg.hpp"
#include "framescale/proxy.hpp"
#include "framescale/newton_dinkelbach.hpp"
#include "framescale/eigen_sum.hpp"
#include "framescale/update.hpp"
#include "framescale/regularizer.hpp"
#include "framescale/frame_scaler.hpp"
#include "framescale/matrix_scaler.hpp"
#include "framescale/perceptron.hpp"
#include "framescale/generate.hpp"
