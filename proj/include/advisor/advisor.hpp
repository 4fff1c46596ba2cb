#pragma once
/// @file advisor.hpp
/// @brief Umbrella header for the whole library.

#include "advisor/analysis.hpp"
#include "advisor/backend.hpp"
#include "advisor/common.hpp"
#include "advisor/config.hpp"
#include "advisor/data_point.hpp"
#include "advisor/dataset_io.hpp"
#include "advisor/eval.hpp"
#include "advisor/exemplar_pool.hpp"
#include "advisor/http_backend.hpp"
#include "advisor/loop.hpp"
#include "advisor/mixer.hpp"
#include "advisor/mock_backend.hpp"
#include "advisor/parallel.hpp"
#include "advisor/prompt_kit.hpp"
#include "advisor/run_state.hpp"
#include "advisor/summary.hpp"
#include "advisor/text.hpp"
