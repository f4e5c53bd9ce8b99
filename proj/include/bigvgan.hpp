#pragma once

// Umbrella header for the BigVGAN inference engine and DSP toolkit.

#include "bigvgan/antialias.hpp"
#include "bigvgan/bench.hpp"
#include "bigvgan/checkpoint.hpp"
#include "bigvgan/conv.hpp"
#include "bigvgan/discriminators.hpp"
#include "bigvgan/error.hpp"
#include "bigvgan/generator.hpp"
#include "bigvgan/losses.hpp"
#include "bigvgan/mel.hpp"
#include "bigvgan/metrics.hpp"
#include "bigvgan/snake.hpp"
#include "bigvgan/spectral.hpp"
#include "bigvgan/tensor.hpp"
#include "bigvgan/wav.hpp"
