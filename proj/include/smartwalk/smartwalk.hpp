#pragma once

#include <smartwalk/benchmark.hpp>
#include <smartwalk/graph.hpp>
#include <smartwalk/io.hpp>
#include <smartwalk/mapeq.hpp>
#include <smartwalk/metrics.hpp>
#include <smartwalk/oracle.hpp>
#include <smartwalk/partition.hpp>
#include <smartwalk/teleport.hpp>
