#ifndef FDB_FDB_HPP
#define FDB_FDB_HPP

#include "fdb/applications.hpp"
#include "fdb/depth.hpp"
#include "fdb/error.hpp"
#include "fdb/estimators.hpp"
#include "fdb/evaluation.hpp"
#include "fdb/matrix.hpp"
#include "fdb/numeric.hpp"
#include "fdb/parallel.hpp"
#include "fdb/random.hpp"
#include "fdb/special.hpp"

#endif
