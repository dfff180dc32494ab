#pragma once

#include "capmod/cap_module.hpp"
#include "capmod/capacity.hpp"
#include "capmod/generators.hpp"
#include "capmod/l0cap.hpp"
#include "capmod/outer_measure.hpp"
#include "capmod/quasicontinuity.hpp"
#include "capmod/report.hpp"
#include "capmod/rng.hpp"
#include "capmod/sobolev.hpp"
#include "capmod/space.hpp"
#include "capmod/studies.hpp"
#include "capmod/suites.hpp"
