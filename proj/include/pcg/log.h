// Copyright 2026 The PCG Authors.
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

#ifndef PCG_LOG_H_
#define PCG_LOG_H_

#include <spdlog/spdlog.h>

namespace pcg {

inline constexpr const char *kLogLevelEnv = "PCG_LOG_LEVEL";

// Shared stderr logger. Its level comes from PCG_LOG_LEVEL (trace, debug,
// info, warn, error, critical, off) and defaults to info.
spdlog::logger &logger();

}  // namespace pcg

#endif  // PCG_LOG_H_
