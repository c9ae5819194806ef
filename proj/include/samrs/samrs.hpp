// Copyright 2026 The samrs-convert Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "samrs/ablation.hpp"
#include "samrs/annotation.hpp"
#include "samrs/backends.hpp"
#include "samrs/categories.hpp"
#include "samrs/errors.hpp"
#include "samrs/geometry.hpp"
#include "samrs/image.hpp"
#include "samrs/manifest.hpp"
#include "samrs/metrics.hpp"
#include "samrs/parsers.hpp"
#include "samrs/pipeline.hpp"
#include "samrs/prompts.hpp"
#include "samrs/remote_backend.hpp"
#include "samrs/rle.hpp"
#include "samrs/segmenter.hpp"
#include "samrs/semantic.hpp"
#include "samrs/stats.hpp"
#include "samrs/tiler.hpp"
#include "samrs/wire.hpp"
