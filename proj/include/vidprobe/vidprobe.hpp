#pragma once

#include "vidprobe/embedding_store.hpp"
#include "vidprobe/evaluation.hpp"
#include "vidprobe/ingestion.hpp"
#include "vidprobe/linear_probe.hpp"
#include "vidprobe/reference_classifier.hpp"
#include "vidprobe/run_config.hpp"
