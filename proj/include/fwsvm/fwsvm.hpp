#pragma once

#include "fwsvm/dataset.hpp"
#include "fwsvm/errors.hpp"
#include "fwsvm/fw_solver.hpp"
#include "fwsvm/kernel.hpp"
#include "fwsvm/mfw_solver.hpp"
#include "fwsvm/model.hpp"
#include "fwsvm/oracle.hpp"
