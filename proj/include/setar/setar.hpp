#pragma once

#include "setar/data_model.hpp"
#include "setar/dgp.hpp"
#include "setar/evaluate.hpp"
#include "setar/fdist.hpp"
#include "setar/io.hpp"
#include "setar/linalg.hpp"
#include "setar/metrics.hpp"
#include "setar/serialize.hpp"
#include "setar/setar_forest.hpp"
#include "setar/setar_tree.hpp"
#include "setar/split_search.hpp"
#include "setar/stopping.hpp"
