// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gqml/checks.hpp"
#include "gqml/crossval.hpp"
#include "gqml/data.hpp"
#include "gqml/encodings.hpp"
#include "gqml/errors.hpp"
#include "gqml/features.hpp"
#include "gqml/io.hpp"
#include "gqml/models.hpp"
#include "gqml/pipeline.hpp"
#include "gqml/qsim.hpp"
#include "gqml/train.hpp"
#include "gqml/vec3.hpp"
