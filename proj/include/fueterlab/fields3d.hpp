#pragma once

#include "fueterlab/fields3d/fueter3.hpp"
#include "fueterlab/fields3d/oracle.hpp"
#include "fueterlab/fields3d/section.hpp"
#include "fueterlab/fields3d/solver.hpp"
