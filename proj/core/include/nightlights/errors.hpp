/*
 * Copyright 2026 the nightlights authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NIGHTLIGHTS_ERRORS_HPP
#define NIGHTLIGHTS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nightlights {

/// Root of all pipeline errors. Concrete subclasses identify the failure
/// category, so callers dispatch on type rather than on message text.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define NIGHTLIGHTS_DEFINE_ERROR(NAME)                                  \
  class NAME : public ::nightlights::Error {                            \
  public:                                                               \
    explicit NAME(const std::string& what) : ::nightlights::Error(what) {} \
  }

}  // namespace nightlights

#endif  // NIGHTLIGHTS_ERRORS_HPP
