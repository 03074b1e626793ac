#pragma once

// Everything at once: parsing, expansions, succinct automata, containment,
// boundedness, the brute-force oracles and the QBF instance generator.

#include "crpq/boundedness.hpp"
#include "crpq/common.hpp"
#include "crpq/expansion.hpp"
#include "crpq/homomorphism.hpp"
#include "crpq/length_set.hpp"
#include "crpq/oracle.hpp"
#include "crpq/parser.hpp"
#include "crpq/qbfgen.hpp"
#include "crpq/succinct_nfa.hpp"
#include "crpq/syntax.hpp"
