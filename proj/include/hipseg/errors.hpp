/*
 * Copyright 2026 The hipseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HIPSEG_ERRORS_HPP_
#define HIPSEG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace hipseg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HIPSEG_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

// volume-io
HIPSEG_DEFINE_ERROR(UnsupportedDatatype)
HIPSEG_DEFINE_ERROR(MalformedHeader)
HIPSEG_DEFINE_ERROR(TruncatedFile)
HIPSEG_DEFINE_ERROR(NonFiniteData)
HIPSEG_DEFINE_ERROR(IoFailure)
HIPSEG_DEFINE_ERROR(IndexOutOfRange)

// tensors and models
HIPSEG_DEFINE_ERROR(ShapeMismatch)
HIPSEG_DEFINE_ERROR(InvalidConfig)
HIPSEG_DEFINE_ERROR(StateError)
HIPSEG_DEFINE_ERROR(VersionMismatch)
HIPSEG_DEFINE_ERROR(CorruptCheckpoint)

// metrics and localization
HIPSEG_DEFINE_ERROR(EmptyReference)
HIPSEG_DEFINE_ERROR(EmptySegmentation)
HIPSEG_DEFINE_ERROR(EmptyProposal)

// data and training
HIPSEG_DEFINE_ERROR(InvalidSpec)
HIPSEG_DEFINE_ERROR(DataError)
HIPSEG_DEFINE_ERROR(DivergenceError)

#undef HIPSEG_DEFINE_ERROR

}  // namespace hipseg

#endif  // HIPSEG_ERRORS_HPP_
