#pragma once

// Umbrella header.

#include "fermiwalk/types.hpp"
#include "fermiwalk/walk.hpp"
#include "fermiwalk/environment.hpp"
#include "fermiwalk/coupling.hpp"
#include "fermiwalk/asymptotics.hpp"
#include "fermiwalk/simulate.hpp"
#include "fermiwalk/fock.hpp"
#include "fermiwalk/disorder.hpp"
