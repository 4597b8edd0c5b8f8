class CursorReader {
    private Cursor mCursor;

    private void close() {
        mCursor.release();
    }

    public void read() {
        try {
            Cursor c = open();
            // <start>
            use(cur);
            // <end>
        } catch (Exception e) {
            log(e);
        }
    }
}
