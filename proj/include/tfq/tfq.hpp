#pragma once

#include "tfq/core.hpp"
#include "tfq/decay.hpp"
#include "tfq/fft.hpp"
#include "tfq/io.hpp"
#include "tfq/norms.hpp"
#include "tfq/phase_space.hpp"
#include "tfq/quantization.hpp"
#include "tfq/stft.hpp"
#include "tfq/symbols.hpp"
#include "tfq/wigner.hpp"
