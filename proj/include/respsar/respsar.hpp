#pragma once

#include "respsar/autofocus.hpp"
#include "respsar/common.hpp"
#include "respsar/evaluation.hpp"
#include "respsar/fft.hpp"
#include "respsar/geometry.hpp"
#include "respsar/imaging.hpp"
#include "respsar/io.hpp"
#include "respsar/mixture.hpp"
#include "respsar/nelder_mead.hpp"
#include "respsar/pipeline.hpp"
#include "respsar/rng.hpp"
#include "respsar/scene.hpp"
#include "respsar/signal_cube.hpp"
#include "respsar/simulator.hpp"
#include "respsar/spatial_separation.hpp"
#include "respsar/stft.hpp"
#include "respsar/tf_separation.hpp"
