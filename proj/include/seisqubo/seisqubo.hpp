#pragma once

#include "seisqubo/elastic_model.hpp"
#include "seisqubo/encoding.hpp"
#include "seisqubo/error.hpp"
#include "seisqubo/forward.hpp"
#include "seisqubo/inversion.hpp"
#include "seisqubo/qubo.hpp"
#include "seisqubo/solvers.hpp"
