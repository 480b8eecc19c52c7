#pragma once

#include "solwave/error.hpp"
#include "solwave/fft.hpp"
#include "solwave/symbols.hpp"
#include "solwave/spectral.hpp"
#include "solwave/models.hpp"
#include "solwave/solver.hpp"
#include "solwave/evolution.hpp"
#include "solwave/cclab.hpp"
#include "solwave/diagnostics.hpp"
#include "solwave/io.hpp"
