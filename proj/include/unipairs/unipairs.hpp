#pragma once

#include "unipairs/core.hpp"
#include "unipairs/csv.hpp"
#include "unipairs/glm.hpp"
#include "unipairs/lasso.hpp"
#include "unipairs/model_io.hpp"
#include "unipairs/parallel.hpp"
#include "unipairs/pipelines.hpp"
#include "unipairs/rng.hpp"
#include "unipairs/simulate.hpp"
#include "unipairs/tripletscan.hpp"
#include "unipairs/unilasso.hpp"
#include "unipairs/univariate.hpp"
