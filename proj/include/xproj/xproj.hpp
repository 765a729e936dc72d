#pragma once

#include "xproj/approximate.hpp"
#include "xproj/bench.hpp"
#include "xproj/document.hpp"
#include "xproj/dtd.hpp"
#include "xproj/ell.hpp"
#include "xproj/eval.hpp"
#include "xproj/generate.hpp"
#include "xproj/grammar.hpp"
#include "xproj/grammar_io.hpp"
#include "xproj/inference.hpp"
#include "xproj/pruner.hpp"
#include "xproj/soundness.hpp"
#include "xproj/validate.hpp"
#include "xproj/xml.hpp"
#include "xproj/xpath.hpp"
