#pragma once

#include "semiframe/error.hpp"
#include "semiframe/numkernel.hpp"
#include "semiframe/random.hpp"
#include "semiframe/spaces.hpp"
#include "semiframe/diagnostics.hpp"
#include "semiframe/duality.hpp"
#include "semiframe/factorization.hpp"
#include "semiframe/constructions.hpp"
#include "semiframe/reconstruction.hpp"
#include "semiframe/expression.hpp"
