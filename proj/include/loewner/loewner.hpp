#pragma once

#include "errors.hpp"
#include "linalg.hpp"
#include "random.hpp"
#include "tuple_calculus.hpp"
#include "certify.hpp"
#include "realization.hpp"
#include "harness.hpp"
