//
// Copyright 2026 the careloop authors
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
//

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace careloop {

enum class Errc {
  duplicate_id,
  invalid_field,
  not_found,
  duplicate_baseline,
  invalid_period,
  already_associated,
  duplicate_interest,
  before_trace_start,
  non_monotone_timestamp,
  insufficient_window,
  degenerate_fit,
  duplicate_rule_id,
  unknown_rule_id,
  time_travel,
  no_route,
  parse_error,
  validation_error,
  unknown_format,
  internal,
};

const char* to_string(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Carries every problem found while validating a scenario, not just the
/// first; the CLI prints them all and exits 1.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace careloop
