#ifndef BBM_BBM_HPP
#define BBM_BBM_HPP

#include "billiard.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "harness.hpp"
#include "io.hpp"
#include "limit_models.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "transport.hpp"
#include "vec2.hpp"

#endif // BBM_BBM_HPP
