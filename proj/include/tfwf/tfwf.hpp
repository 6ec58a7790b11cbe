/* Copyright 2026 The TFWaveFormer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include "tfwf/checkpoint.hpp"
#include "tfwf/config.hpp"
#include "tfwf/errors.hpp"
#include "tfwf/features.hpp"
#include "tfwf/gradcheck.hpp"
#include "tfwf/link_predictor.hpp"
#include "tfwf/metrics.hpp"
#include "tfwf/model.hpp"
#include "tfwf/nn.hpp"
#include "tfwf/ops.hpp"
#include "tfwf/optimizer.hpp"
#include "tfwf/pipeline.hpp"
#include "tfwf/sampler.hpp"
#include "tfwf/synth.hpp"
#include "tfwf/temporal_graph.hpp"
#include "tfwf/tensor.hpp"
#include "tfwf/training.hpp"
#include "tfwf/transformer.hpp"
#include "tfwf/wavelet.hpp"
