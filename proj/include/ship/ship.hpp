#pragma once

#include "ship/augment.hpp"
#include "ship/core.hpp"
#include "ship/discovery.hpp"
#include "ship/distance.hpp"
#include "ship/error.hpp"
#include "ship/explain.hpp"
#include "ship/features.hpp"
#include "ship/json_io.hpp"
#include "ship/model.hpp"
#include "ship/parallel.hpp"
#include "ship/pip.hpp"
#include "ship/pipeline.hpp"
#include "ship/rng.hpp"
#include "ship/run.hpp"
#include "ship/synthetic.hpp"
