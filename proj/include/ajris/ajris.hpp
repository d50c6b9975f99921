#ifndef AJRIS_AJRIS_HPP
#define AJRIS_AJRIS_HPP

#include "ajris/channel.hpp"
#include "ajris/config.hpp"
#include "ajris/error.hpp"
#include "ajris/harness.hpp"
#include "ajris/linalg.hpp"
#include "ajris/optimizer.hpp"
#include "ajris/qcqp.hpp"
#include "ajris/rng.hpp"
#include "ajris/rwp.hpp"
#include "ajris/saa.hpp"
#include "ajris/system.hpp"

#endif // AJRIS_AJRIS_HPP
