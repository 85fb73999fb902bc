#pragma once

#include "sem/backend.hpp"
#include "sem/config.hpp"
#include "sem/dataset.hpp"
#include "sem/engagement.hpp"
#include "sem/evaluation.hpp"
#include "sem/pipeline.hpp"
#include "sem/polarity.hpp"
#include "sem/report.hpp"
#include "sem/sentiment.hpp"
