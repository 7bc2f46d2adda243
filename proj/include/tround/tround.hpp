// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tround/circuit.hpp"
#include "tround/cost.hpp"
#include "tround/lbfgs.hpp"
#include "tround/optimize.hpp"
#include "tround/parallel.hpp"
#include "tround/partition.hpp"
#include "tround/qasm.hpp"
#include "tround/report.hpp"
#include "tround/tcount.hpp"
#include "tround/unitary.hpp"
