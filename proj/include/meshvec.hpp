/*
 * Copyright 2026 The meshvec Authors. All rights reserved.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

#include <meshvec/errors.hpp>
#include <meshvec/mesh.hpp>
#include <meshvec/generators.hpp>
#include <meshvec/mesh_io.hpp>
#include <meshvec/dec.hpp>
#include <meshvec/linalg.hpp>
#include <meshvec/spectral.hpp>
#include <meshvec/fields.hpp>
#include <meshvec/kernels.hpp>
#include <meshvec/gp.hpp>
#include <meshvec/fit.hpp>
#include <meshvec/export.hpp>
