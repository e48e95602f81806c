// Copyright 2026 The hierlpr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hierlpr {

// Coarse classification used by the CLI to pick an exit status.
enum class ErrorCategory {
  validation,    // malformed or inconsistent input
  unattainable,  // a requested target cannot be met by the data
  runtime,       // everything else
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define HIERLPR_DEFINE_ERROR(Name, Category)                  \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& what)                    \
        : Error(ErrorCategory::Category, #Name ": " + what) {} \
  };

// hierarchy
HIERLPR_DEFINE_ERROR(ValidationError, validation)
HIERLPR_DEFINE_ERROR(CycleError, validation)
HIERLPR_DEFINE_ERROR(MissingScoreError, validation)
HIERLPR_DEFINE_ERROR(TruthInconsistencyError, validation)
HIERLPR_DEFINE_ERROR(LengthMismatchError, validation)
HIERLPR_DEFINE_ERROR(NotAForestError, validation)
// lpr model
HIERLPR_DEFINE_ERROR(DegenerateClassError, validation)
HIERLPR_DEFINE_ERROR(BandwidthError, validation)
HIERLPR_DEFINE_ERROR(ZeroDensityError, runtime)
HIERLPR_DEFINE_ERROR(UnfittedLabelError, validation)
// metrics
HIERLPR_DEFINE_ERROR(ZeroPositivesError, validation)
// ranker
HIERLPR_DEFINE_ERROR(EmptyInputError, validation)
HIERLPR_DEFINE_ERROR(BudgetError, validation)
// dag adapter
HIERLPR_DEFINE_ERROR(SplitCapExceededError, validation)
// experiments
HIERLPR_DEFINE_ERROR(RetryExhaustedError, runtime)
HIERLPR_DEFINE_ERROR(UnattainableTargetError, unattainable)

#undef HIERLPR_DEFINE_ERROR

// Carries the number of items produced before the cap was hit.
class CapExceededError : public Error {
 public:
  CapExceededError(std::size_t cap, std::size_t count)
      : Error(ErrorCategory::validation,
              "CapExceededError: more than " + std::to_string(cap) +
                  " orderings (stopped at " + std::to_string(count) + ")"),
        count_(count) {}

  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t count_;
};

}  // namespace hierlpr
