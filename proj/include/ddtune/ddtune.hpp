#pragma once

#include "ddtune/analysis.hpp"
#include "ddtune/batch.hpp"
#include "ddtune/coherence.hpp"
#include "ddtune/errors.hpp"
#include "ddtune/io.hpp"
#include "ddtune/noise_model.hpp"
#include "ddtune/nsd_fitting.hpp"
#include "ddtune/oracle.hpp"
#include "ddtune/rl_agent.hpp"
#include "ddtune/rng.hpp"
#include "ddtune/sensing.hpp"
#include "ddtune/sequence.hpp"
#include "ddtune/spectral_engine.hpp"
