#include <stdio.h>
#include <string.h>
#include "dunstan.h"

int main(void) {
    DunstanDecoder *d = dunstan_decoder_new();
    char *out = NULL;
    if (!d) return 10;
    if (dunstan_decode_line(d, "PLA ANT", 1, &out) != DUNSTAN_STATUS_OK) return 11;
    if (!strstr(out, "\"PLANT\"")) return 12;
    dunstan_string_free(out);
    if (dunstan_decode_line(d, "PLA ~", 1, &out) != DUNSTAN_STATUS_PARSE_ERROR) return 13;
    if (strlen(dunstan_last_error()) == 0) return 14;
    if (dunstan_encode(d, "PLANT", &out) != DUNSTAN_STATUS_OK) return 15;
    if (strcmp(out, "PLA ANT") != 0) return 16;
    dunstan_string_free(out);
    dunstan_decoder_free(d);
    printf("ok\n");
    return 0;
}
