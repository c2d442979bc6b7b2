#pragma once

#include "scf/bounds.hpp"
#include "scf/channels.hpp"
#include "scf/constructions.hpp"
#include "scf/errors.hpp"
#include "scf/io.hpp"
#include "scf/numerics.hpp"
#include "scf/random.hpp"
#include "scf/regularize.hpp"
