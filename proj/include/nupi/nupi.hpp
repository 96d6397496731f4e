#pragma once

// Umbrella header.

#include <nupi/digraph.hpp>
#include <nupi/dynamics.hpp>
#include <nupi/errors.hpp>
#include <nupi/metrics.hpp>
#include <nupi/scenario_file.hpp>
#include <nupi/schedule.hpp>
#include <nupi/simulate.hpp>
