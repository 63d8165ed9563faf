#pragma once

#include "mflab/dilation.hpp"
#include "mflab/groups.hpp"
#include "mflab/matrix.hpp"
#include "mflab/mfcheck.hpp"
#include "mflab/ncpoly.hpp"
#include "mflab/oracles.hpp"
#include "mflab/parallel.hpp"
#include "mflab/pvcrossed.hpp"
#include "mflab/report.hpp"
#include "mflab/rng.hpp"
#include "mflab/sparse.hpp"
