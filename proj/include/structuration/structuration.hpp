#pragma once

#include "structuration/corpus_io.hpp"
#include "structuration/distributions.hpp"
#include "structuration/factors.hpp"
#include "structuration/infomeasures.hpp"
#include "structuration/matrix.hpp"
#include "structuration/maxent.hpp"
#include "structuration/netmetrics.hpp"
#include "structuration/pipeline.hpp"
