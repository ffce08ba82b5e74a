#pragma once
// Umbrella header.

#include "carleman/errors.hpp"
#include "carleman/specfun.hpp"
#include "carleman/coeffmap.hpp"
#include "carleman/profile.hpp"
#include "carleman/liouville.hpp"
#include "carleman/scattering.hpp"
#include "carleman/longrange.hpp"
#include "carleman/hankelphase.hpp"
#include "carleman/statphase.hpp"
#include "carleman/evolution.hpp"
