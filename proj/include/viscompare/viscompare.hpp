#pragma once

#include "viscompare/types.hpp"
#include "viscompare/growth.hpp"
#include "viscompare/modulus.hpp"
#include "viscompare/hamiltonian.hpp"
#include "viscompare/operator.hpp"
#include "viscompare/problem.hpp"
#include "viscompare/residual.hpp"
#include "viscompare/barrier.hpp"
#include "viscompare/builtins.hpp"
#include "viscompare/solver.hpp"
#include "viscompare/systems.hpp"
#include "viscompare/hypotheses.hpp"
#include "viscompare/polynomial.hpp"
#include "viscompare/scenario.hpp"
#include "viscompare/report.hpp"
