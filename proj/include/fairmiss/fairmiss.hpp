// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMISS_FAIRMISS_HPP
#define FAIRMISS_FAIRMISS_HPP

#include "fairmiss/csv.hpp"
#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"
#include "fairmiss/experiments.hpp"
#include "fairmiss/group.hpp"
#include "fairmiss/handling.hpp"
#include "fairmiss/metrics.hpp"
#include "fairmiss/missingness.hpp"
#include "fairmiss/models.hpp"
#include "fairmiss/octagon.hpp"
#include "fairmiss/random.hpp"
#include "fairmiss/stats.hpp"

namespace fairmiss {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace fairmiss

#endif  // FAIRMISS_FAIRMISS_HPP
