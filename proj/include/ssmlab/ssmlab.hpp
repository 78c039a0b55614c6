#pragma once

#include "ssmlab/autocorr.hpp"
#include "ssmlab/common.hpp"
#include "ssmlab/gram.hpp"
#include "ssmlab/init.hpp"
#include "ssmlab/io.hpp"
#include "ssmlab/recovery.hpp"
#include "ssmlab/ssm.hpp"
#include "ssmlab/stability.hpp"
#include "ssmlab/trainer.hpp"
