#pragma once

#include "breakcurve/commands.hpp"
#include "breakcurve/correlation.hpp"
#include "breakcurve/curve.hpp"
#include "breakcurve/error.hpp"
#include "breakcurve/estimation.hpp"
#include "breakcurve/io.hpp"
#include "breakcurve/models.hpp"
#include "breakcurve/objective.hpp"
#include "breakcurve/reference_data.hpp"
#include "breakcurve/sensitivity.hpp"
#include "breakcurve/simplex.hpp"
#include "breakcurve/synthetic.hpp"
#include "breakcurve/units.hpp"
