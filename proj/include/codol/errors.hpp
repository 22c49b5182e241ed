// Copyright 2026 The codol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace codol {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CODOL_DEFINE_ERROR(Name) \
    class Name : public Error {  \
    public:                      \
        using Error::Error;      \
    }

CODOL_DEFINE_ERROR(ShapeError);
CODOL_DEFINE_ERROR(LengthError);
CODOL_DEFINE_ERROR(IndexError);
CODOL_DEFINE_ERROR(ArgumentError);
CODOL_DEFINE_ERROR(ParseError);
CODOL_DEFINE_ERROR(IngestionError);
CODOL_DEFINE_ERROR(ProtocolError);
CODOL_DEFINE_ERROR(TrainingError);
CODOL_DEFINE_ERROR(ConfigError);
CODOL_DEFINE_ERROR(UnknownTokenError);

#undef CODOL_DEFINE_ERROR

}  // namespace codol
