#pragma once

// Graph-derived user vectors: walk generation plus skip-gram training.
#include "stancelab/skipgram.hpp"
#include "stancelab/walks.hpp"
