#pragma once

#include "privfair/audit.hpp"
#include "privfair/data.hpp"
#include "privfair/dealer.hpp"
#include "privfair/engine.hpp"
#include "privfair/errors.hpp"
#include "privfair/inference.hpp"
#include "privfair/oracle.hpp"
#include "privfair/prep_budget.hpp"
#include "privfair/primitives.hpp"
#include "privfair/prg.hpp"
#include "privfair/report.hpp"
#include "privfair/ring.hpp"
#include "privfair/roles.hpp"
#include "privfair/session.hpp"
#include "privfair/shares.hpp"
#include "privfair/transport.hpp"
#include "privfair/wire.hpp"
