// Copyright (c) 2026 The privmotion authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "privmotion/dataset.hpp"
#include "privmotion/dct.hpp"
#include "privmotion/errors.hpp"
#include "privmotion/evaluation.hpp"
#include "privmotion/gcn.hpp"
#include "privmotion/graph.hpp"
#include "privmotion/losses.hpp"
#include "privmotion/mat.hpp"
#include "privmotion/networks.hpp"
#include "privmotion/param_store.hpp"
#include "privmotion/preprocess.hpp"
#include "privmotion/rng.hpp"
#include "privmotion/run_config.hpp"
#include "privmotion/strings.hpp"
#include "privmotion/trainer.hpp"
#include "privmotion/version.hpp"

