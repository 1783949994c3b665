#ifndef MIGMINE_HPP
#define MIGMINE_HPP

#include "migmine/model.hpp"
#include "migmine/csv.hpp"
#include "migmine/time.hpp"
#include "migmine/ingest.hpp"
#include "migmine/mining.hpp"
#include "migmine/knowledge.hpp"
#include "migmine/graph.hpp"
#include "migmine/trends.hpp"
#include "migmine/loglens.hpp"
#include "migmine/synth.hpp"

#endif  // MIGMINE_HPP
