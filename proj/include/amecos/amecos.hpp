#pragma once

#include "amecos/history.hpp"
#include "amecos/relation.hpp"
#include "amecos/object_specs.hpp"
#include "amecos/consistency.hpp"
#include "amecos/checker.hpp"
#include "amecos/sigma.hpp"
#include "amecos/harness.hpp"
#include "amecos/io.hpp"
