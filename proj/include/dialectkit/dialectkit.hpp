#pragma once

// Umbrella header. http_backend.hpp is excluded on purpose: it pulls in the
// HTTP stack, which most consumers do not need.

#include "dialectkit/classifier.hpp"
#include "dialectkit/config.hpp"
#include "dialectkit/corpus.hpp"
#include "dialectkit/engine.hpp"
#include "dialectkit/errors.hpp"
#include "dialectkit/llm_client.hpp"
#include "dialectkit/metrics.hpp"
#include "dialectkit/report.hpp"
#include "dialectkit/retrieval.hpp"
#include "dialectkit/rng.hpp"
#include "dialectkit/serialize.hpp"
#include "dialectkit/synthlang.hpp"
#include "dialectkit/text.hpp"
#include "dialectkit/types.hpp"
