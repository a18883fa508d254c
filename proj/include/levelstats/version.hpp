#pragma once

#define LEVELSTATS_VERSION_MAJOR 0
#define LEVELSTATS_VERSION_MINOR 1
#define LEVELSTATS_VERSION_PATCH 0
#define LEVELSTATS_VERSION "0.1.0"
