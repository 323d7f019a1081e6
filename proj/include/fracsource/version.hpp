#pragma once

#define FRACSOURCE_VERSION_MAJOR 0
#define FRACSOURCE_VERSION_MINOR 1
#define FRACSOURCE_VERSION_PATCH 0
#define FRACSOURCE_VERSION_STRING "0.1.0"
