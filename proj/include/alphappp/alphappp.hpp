#pragma once

// Core library. The HTTP service lives in alphappp/service.hpp and additionally
// needs cpp-httplib and OpenSSL.

#include "alphappp/activity.hpp"
#include "alphappp/candidates.hpp"
#include "alphappp/csv.hpp"
#include "alphappp/dfg.hpp"
#include "alphappp/discovery.hpp"
#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"
#include "alphappp/log_io.hpp"
#include "alphappp/log_repair.hpp"
#include "alphappp/net_export.hpp"
#include "alphappp/petri_net.hpp"
#include "alphappp/timestamp.hpp"
#include "alphappp/xes.hpp"
