#pragma once

#include "pcx/bethe.hpp"
#include "pcx/chain_predictive.hpp"
#include "pcx/error.hpp"
#include "pcx/io.hpp"
#include "pcx/predictive.hpp"
#include "pcx/scan.hpp"
#include "pcx/spin_hilbert.hpp"
