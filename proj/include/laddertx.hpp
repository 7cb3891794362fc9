#ifndef LADDERTX_HPP
#define LADDERTX_HPP

#include "laddertx/certificate.hpp"
#include "laddertx/contracts.hpp"
#include "laddertx/dsl.hpp"
#include "laddertx/engine.hpp"
#include "laddertx/error.hpp"
#include "laddertx/generate.hpp"
#include "laddertx/instance.hpp"
#include "laddertx/ladder.hpp"
#include "laddertx/metamodel.hpp"
#include "laddertx/replay.hpp"
#include "laddertx/report.hpp"
#include "laddertx/uml2sql.hpp"

#endif
