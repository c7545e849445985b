// Copyright 2026 The lareval Authors
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

#include "lareval/errors.hpp"

namespace lareval {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kReference: return "reference error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kGeometry: return "geometry error";
    case ErrorKind::kLength: return "length error";
    case ErrorKind::kCodec: return "codec error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kEmptiness: return "emptiness error";
    case ErrorKind::kPlacement: return "placement error";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

}  // namespace lareval
