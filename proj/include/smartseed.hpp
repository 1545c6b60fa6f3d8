#pragma once

#include "smartseed/value.hpp"
#include "smartseed/ast.hpp"
#include "smartseed/parser.hpp"
#include "smartseed/instrumenter.hpp"
#include "smartseed/reachability.hpp"
#include "smartseed/executor.hpp"
#include "smartseed/term.hpp"
#include "smartseed/solver.hpp"
#include "smartseed/bmc.hpp"
#include "smartseed/fuzz.hpp"
#include "smartseed/tracer.hpp"
#include "smartseed/orchestrator.hpp"
#include "smartseed/suite_io.hpp"
#include "smartseed/corpus.hpp"
