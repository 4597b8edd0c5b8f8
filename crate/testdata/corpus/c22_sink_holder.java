class SinkHolder {
    private int mCount;

    public void drain() {
        mCount = mCount + 1;
        // <start>
        flush(sink);
        // <end>
    }

    private OutputStream mSink;
}
