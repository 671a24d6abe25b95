#pragma once

#include "collsum/chunker.hpp"
#include "collsum/cluster.hpp"
#include "collsum/completion.hpp"
#include "collsum/config.hpp"
#include "collsum/corpus.hpp"
#include "collsum/embed.hpp"
#include "collsum/error.hpp"
#include "collsum/export.hpp"
#include "collsum/hdbscan.hpp"
#include "collsum/lda.hpp"
#include "collsum/pipeline.hpp"
#include "collsum/projection.hpp"
#include "collsum/rouge.hpp"
#include "collsum/sentiment.hpp"
#include "collsum/summarize.hpp"
#include "collsum/topics.hpp"
#include "collsum/vector_index.hpp"
