#pragma once

#include "error.hpp"
#include "random.hpp"
#include "report.hpp"
#include "flowspace.hpp"
#include "cocycle.hpp"
#include "functional.hpp"
#include "kernel.hpp"
#include "simulate.hpp"
#include "expression.hpp"
#include "controls.hpp"
#include "config.hpp"
