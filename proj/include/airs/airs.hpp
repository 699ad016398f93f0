#pragma once

#include "airs/channel.hpp"
#include "airs/errors.hpp"
#include "airs/experiments.hpp"
#include "airs/linalg.hpp"
#include "airs/multiuser.hpp"
#include "airs/qcqp.hpp"
#include "airs/rng.hpp"
#include "airs/selftest.hpp"
#include "airs/single_user.hpp"
#include "airs/static_ao.hpp"
#include "airs/system.hpp"
