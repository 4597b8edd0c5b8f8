class Document {
    private TextHelper mHelper;
    private StringBuilder mBuf;
    private String mName;

    void rename(String next) {
        mName = next;
    }

    public void export() {
        // <start>
        mHelper.emit(chunk);
        // <end>
    }
}
