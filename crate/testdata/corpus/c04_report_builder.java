class ReportBuilder {
    private StringBuilder mBuilder;
    private String mName;
    private int mSize;

    void render(StringBuilder sb) {
        mSize = mName.length();
    }

    public void flush() {
        // <start>
        render(buf);
        // <end>
    }
}
