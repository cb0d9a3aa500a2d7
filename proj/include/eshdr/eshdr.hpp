// Copyright 2026 The eshdr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include "eshdr/align.hpp"
#include "eshdr/config.hpp"
#include "eshdr/deblur.hpp"
#include "eshdr/degrade.hpp"
#include "eshdr/error.hpp"
#include "eshdr/events.hpp"
#include "eshdr/eventsim.hpp"
#include "eshdr/fuse.hpp"
#include "eshdr/image.hpp"
#include "eshdr/io/event_file.hpp"
#include "eshdr/io/flow_file.hpp"
#include "eshdr/io/pfm.hpp"
#include "eshdr/io/pnm.hpp"
#include "eshdr/io/sidecar.hpp"
#include "eshdr/metrics.hpp"
#include "eshdr/parallel.hpp"
#include "eshdr/pipeline.hpp"
#include "eshdr/scenesim.hpp"
#include "eshdr/transfer.hpp"
