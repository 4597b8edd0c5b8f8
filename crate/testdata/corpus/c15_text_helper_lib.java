class TextHelper {
    void emit(StringBuilder sb) {
    }
}
