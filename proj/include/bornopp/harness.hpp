#pragma once

#include "bornopp/harness/config.hpp"
#include "bornopp/harness/report.hpp"
#include "bornopp/harness/scan.hpp"
#include "bornopp/harness/suites.hpp"
