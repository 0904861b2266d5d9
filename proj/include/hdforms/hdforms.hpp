#pragma once

#include "complex.hpp"
#include "operators.hpp"
#include "calculus.hpp"
#include "tent.hpp"
#include "hardy.hpp"
#include "probes.hpp"
#include "io.hpp"
#include "harness.hpp"
