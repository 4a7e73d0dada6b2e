#pragma once

#include "fueterlab/spheremaps/grid.hpp"
#include "fueterlab/spheremaps/io.hpp"
#include "fueterlab/spheremaps/jets.hpp"
#include "fueterlab/spheremaps/map.hpp"
