// SPDX-License-Identifier: Apache-2.0
//
// hpl - hybrid precoding library for multiuser MIMO downlink simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HPL_HPL_HPP
#define HPL_HPL_HPP

#include "hpl/channel.hpp"
#include "hpl/config.hpp"
#include "hpl/core.hpp"
#include "hpl/csv.hpp"
#include "hpl/digital_design.hpp"
#include "hpl/experiment.hpp"
#include "hpl/precoding.hpp"
#include "hpl/rf_design.hpp"

#endif // HPL_HPL_HPP
