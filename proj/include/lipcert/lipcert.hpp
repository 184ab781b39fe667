// Copyright 2026 The lipcert Authors
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

#ifndef LIPCERT_LIPCERT_HPP_
#define LIPCERT_LIPCERT_HPP_

#include "lipcert/bnb.hpp"
#include "lipcert/common.hpp"
#include "lipcert/estimators.hpp"
#include "lipcert/interval.hpp"
#include "lipcert/lipmip.hpp"
#include "lipcert/lipmip_model.hpp"
#include "lipcert/lp.hpp"
#include "lipcert/mip.hpp"
#include "lipcert/network.hpp"
#include "lipcert/network_io.hpp"
#include "lipcert/norms.hpp"
#include "lipcert/oracle.hpp"
#include "lipcert/reduction.hpp"
#include "lipcert/rng.hpp"
#include "lipcert/vector_ext.hpp"

#endif  // LIPCERT_LIPCERT_HPP_
