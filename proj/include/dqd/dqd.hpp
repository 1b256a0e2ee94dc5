#pragma once

#include "dqd/aggregate.hpp"
#include "dqd/dataset.hpp"
#include "dqd/embedding_store.hpp"
#include "dqd/error.hpp"
#include "dqd/knn.hpp"
#include "dqd/lexical.hpp"
#include "dqd/manifest.hpp"
#include "dqd/metrics.hpp"
#include "dqd/probe.hpp"
#include "dqd/synth.hpp"
